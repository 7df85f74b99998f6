#include "cardiotox/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cardiotox/error.hpp"

namespace cardiotox::csv {

std::vector<Record> parse(std::string_view text, const std::string& source_name) {
    std::vector<Record> records;
    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();

    // UTF-8 byte order mark
    if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;

    while (i < n) {
        Record rec;
        rec.line = line;
        std::string field;
        bool done = false;
        while (!done) {
            field.clear();
            if (i < n && text[i] == '"') {
                ++i;
                for (;;) {
                    if (i >= n)
                        throw Error(ErrorCode::malformed_row,
                                    source_name + " line " + std::to_string(rec.line) +
                                        ": unterminated quoted field");
                    char c = text[i++];
                    if (c == '"') {
                        if (i < n && text[i] == '"') {
                            field.push_back('"');
                            ++i;
                        } else {
                            break;
                        }
                    } else {
                        if (c == '\n') ++line;
                        field.push_back(c);
                    }
                }
                if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
                    throw Error(ErrorCode::malformed_row,
                                source_name + " line " + std::to_string(line) +
                                    ": unexpected character after closing quote");
            } else {
                while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
                    field.push_back(text[i++]);
            }
            rec.fields.push_back(field);
            if (i >= n) {
                done = true;
            } else if (text[i] == ',') {
                ++i;
            } else {
                if (text[i] == '\r') ++i;
                if (i < n && text[i] == '\n') ++i;
                ++line;
                done = true;
            }
        }
        // blank lines carry no record
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        records.push_back(std::move(rec));
    }
    return records;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Record> read_file(const std::filesystem::path& path) {
    return parse(read_text(path), path.filename().string());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

Writer::Writer(std::vector<std::string> header) : width_(header.size()) {
    row(header);
}

Writer& Writer::row(const std::vector<std::string>& fields) {
    if (fields.size() != width_)
        throw std::logic_error("csv row width " + std::to_string(fields.size()) +
                               " != header width " + std::to_string(width_));
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) buffer_.push_back(',');
        buffer_ += escape(fields[i]);
    }
    buffer_.push_back('\n');
    return *this;
}

Writer& Writer::comment(std::string_view text) {
    buffer_ += "# ";
    buffer_ += text;
    buffer_.push_back('\n');
    return *this;
}

}  // namespace cardiotox::csv
