#ifndef MZSG_CSV_HPP
#define MZSG_CSV_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace mzsg {

/// Shortest decimal representation that round-trips the double ('.' decimal,
/// locale-independent). Used everywhere a number is written to disk so that
/// repeated runs produce byte-identical files.
std::string format_double(double v);

/// In-memory CSV builder: header row, LF line endings. The finished document
/// is written in one shot and digested for the run manifest.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void begin_row();
    void add(double v);
    void add(long long v);
    void add(std::size_t v);
    void add(const std::string& v);
    void end_row();

    const std::string& bytes() const { return buf_; }
    void write_file(const std::string& path) const;

private:
    std::string buf_;
    std::size_t columns_;
    std::size_t in_row_;
    bool row_open_ = false;
};

/// FNV-1a 64-bit content digest, hex-encoded.
std::uint64_t fnv1a64(const std::string& bytes);
std::string digest_hex(const std::string& bytes);

} // namespace mzsg

#endif // MZSG_CSV_HPP
