#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace triage {

// RFC 4180 record reader over an in-memory buffer. Fields may be quoted with
// double quotes; quoted fields may contain commas, doubled quotes, and
// newlines. Accepts LF and CRLF record endings.
class CsvReader {
public:
    explicit CsvReader(std::string_view buffer) : buf_(buffer) {}

    // Fills `fields` with the next record. Returns false at end of input.
    // A trailing newline does not produce an empty final record.
    bool next_record(std::vector<std::string>& fields);

    bool eof() const { return pos_ >= buf_.size(); }

private:
    std::string_view buf_;
    std::size_t pos_ = 0;
};

// Quotes a field only when needed (comma, quote, CR or LF present).
void append_csv_field(std::string& out, std::string_view field);

// Writes one record terminated by LF.
void write_csv_record(std::ostream& os, const std::vector<std::string>& fields);
void write_csv_record(std::string& out, const std::vector<std::string>& fields);

}  // namespace triage
