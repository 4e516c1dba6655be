#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace octorad {

// Minimal CSV table with deterministic number formatting, so reruns with the
// same seed produce byte-identical files.
class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    class Row {
    public:
        explicit Row(std::size_t width) { cells_.reserve(width); }
        Row& str(const std::string& s) {
            cells_.push_back(s);
            return *this;
        }
        Row& num(double v, int sig = 10) {
            cells_.push_back(format_number(v, sig));
            return *this;
        }
        Row& integer(long long v) {
            cells_.push_back(std::to_string(v));
            return *this;
        }
        const std::vector<std::string>& cells() const { return cells_; }

    private:
        std::vector<std::string> cells_;
    };

    Row& add_row() {
        rows_.emplace_back(header_.size());
        return rows_.back();
    }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<Row>& rows() const { return rows_; }

    std::string to_csv() const;
    void write_csv(const std::string& path) const;

    static std::string format_number(double v, int sig = 10);

private:
    std::vector<std::string> header_;
    std::vector<Row> rows_;
};

struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;
};

CsvData read_csv(const std::string& path);
CsvData parse_csv(const std::string& text);

}  // namespace octorad
