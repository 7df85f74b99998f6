#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cardiotox::csv {

struct Record {
    std::size_t line = 0;  // 1-based physical line where the record starts
    std::vector<std::string> fields;
};

/// RFC-4180 parse of a whole document. Throws Error(malformed_row) on an
/// unterminated quote or stray characters after a closing quote.
std::vector<Record> parse(std::string_view text, const std::string& source_name);

/// Reads the file and parses it; Error(io_error) when unreadable.
std::vector<Record> read_file(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

/// Writes `text` verbatim (binary mode, so LF stays LF).
void write_text(const std::filesystem::path& path, std::string_view text);

/// Quotes a field only when it contains a delimiter, quote or line break.
std::string escape(std::string_view field);

/// Ten significant digits, "%.10g" style; -0 prints as 0.
std::string format_real(double value);

/// Builds a CSV document row by row with LF line endings.
class Writer {
public:
    explicit Writer(std::vector<std::string> header);

    Writer& row(const std::vector<std::string>& fields);
    Writer& comment(std::string_view text);

    const std::string& str() const { return buffer_; }
    void save(const std::filesystem::path& path) const { write_text(path, buffer_); }

private:
    std::size_t width_;
    std::string buffer_;
};

}  // namespace cardiotox::csv
