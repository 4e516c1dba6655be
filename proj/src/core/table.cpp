#include "octorad/core/table.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace octorad {

std::string Table::format_number(double v, int sig) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", sig, v);
    return buf;
}

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ",";
        out += header_[i];
    }
    out += "\n";
    for (const Row& r : rows_) {
        const auto& cells = r.cells();
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ",";
            out += cells[i];
        }
        out += "\n";
    }
    return out;
}

void Table::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("Table: cannot open for write: " + path);
    const std::string s = to_csv();
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!f) throw std::runtime_error("Table: write failed: " + path);
}

int CsvData::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("csv: no column named " + name);
}

static std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

CsvData parse_csv(const std::string& text) {
    CsvData d;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        auto cells = split_line(line);
        if (first) {
            d.header = std::move(cells);
            first = false;
        } else {
            d.rows.push_back(std::move(cells));
        }
    }
    return d;
}

CsvData read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("csv: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str());
}

}  // namespace octorad
