#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "tfcli/tfcli.hpp"

namespace tfcli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw InputError("line " + std::to_string(line) + ": " + msg);
}

double parse_number(std::string_view field, std::size_t line, const char* column) {
    double v = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
        fail(line, std::string("column ") + column + " is not a finite number: '" + std::string(field) + "'");
    return v;
}

}  // namespace

XYData read_xy_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::size_t> xcol, ycol;
    std::size_t ncols = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto header = split_fields(line);
        ncols = header.size();
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == "x") xcol = c;
            if (header[c] == "y") ycol = c;
        }
        break;
    }
    if (ncols == 0) throw InputError("line 1: missing header row");
    if (!xcol || !ycol) fail(lineno, "header must name columns x and y");

    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != ncols)
            fail(lineno, "expected " + std::to_string(ncols) + " fields, found " + std::to_string(fields.size()));
        xs.push_back(parse_number(fields[*xcol], lineno, "x"));
        ys.push_back(parse_number(fields[*ycol], lineno, "y"));
    }
    if (xs.empty()) throw InputError("no data rows");
    XYData data;
    data.x = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    data.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    return data;
}

XYData read_xy_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return read_xy_csv(in);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

void validate_even_grid(const Eigen::VectorXd& x, double rel_tol) {
    const Eigen::Index n = x.size();
    if (n < 2) return;
    const double h = (x[n - 1] - x[0]) / static_cast<double>(n - 1);
    if (!(h > 0.0)) throw InputError("x must be increasing");
    for (Eigen::Index i = 1; i < n; ++i) {
        const double step = x[i] - x[i - 1];
        if (std::abs(step - h) > rel_tol * h)
            throw InputError("x is not evenly spaced (data row " + std::to_string(i + 1) + ")");
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_csv(const std::vector<std::string>& header, const std::vector<Eigen::VectorXd>& columns) {
    if (header.size() != columns.size()) throw std::invalid_argument("format_csv: header and columns differ in count");
    const Eigen::Index rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows) throw std::invalid_argument("format_csv: columns differ in length");
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
    out += '\n';
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ',';
            out += format_double(columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << contents;
    if (!out) throw InputError("write failed: " + path);
}

}  // namespace tfcli
