#include "mzsg/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mzsg/errors.hpp"

namespace mzsg {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()), in_row_(0) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += header[i];
    }
    buf_ += '\n';
}

void CsvTable::begin_row() {
    row_open_ = true;
    in_row_ = 0;
}

void CsvTable::add(double v) { add(format_double(v)); }
void CsvTable::add(long long v) { add(std::to_string(v)); }
void CsvTable::add(std::size_t v) { add(std::to_string(v)); }

void CsvTable::add(const std::string& v) {
    if (!row_open_) begin_row();
    if (in_row_) buf_ += ',';
    buf_ += v;
    ++in_row_;
}

void CsvTable::end_row() {
    if (in_row_ != columns_)
        throw std::logic_error("CsvTable: row has " + std::to_string(in_row_) +
                               " cells, header has " + std::to_string(columns_));
    buf_ += '\n';
    row_open_ = false;
    in_row_ = 0;
}

void CsvTable::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot open output file: " + path);
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw ModelError("short write: " + path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string digest_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string(buf);
}

} // namespace mzsg
