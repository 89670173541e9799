#include "triage/csv.hpp"

namespace triage {

bool CsvReader::next_record(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= buf_.size()) return false;

    std::string field;
    bool in_quotes = false;
    while (pos_ < buf_.size()) {
        char c = buf_[pos_];
        if (in_quotes) {
            if (c == '"') {
                if (pos_ + 1 < buf_.size() && buf_[pos_ + 1] == '"') {
                    field.push_back('"');
                    pos_ += 2;
                } else {
                    in_quotes = false;
                    ++pos_;
                }
            } else {
                field.push_back(c);
                ++pos_;
            }
            continue;
        }
        switch (c) {
            case '"':
                // Opening quote only counts at field start; a stray quote
                // mid-field is kept verbatim.
                if (field.empty()) {
                    in_quotes = true;
                } else {
                    field.push_back('"');
                }
                ++pos_;
                break;
            case ',':
                fields.push_back(std::move(field));
                field.clear();
                ++pos_;
                break;
            case '\r':
                if (pos_ + 1 < buf_.size() && buf_[pos_ + 1] == '\n') {
                    pos_ += 2;
                } else {
                    ++pos_;
                }
                fields.push_back(std::move(field));
                return true;
            case '\n':
                ++pos_;
                fields.push_back(std::move(field));
                return true;
            default:
                field.push_back(c);
                ++pos_;
                break;
        }
    }
    fields.push_back(std::move(field));
    return true;
}

void append_csv_field(std::string& out, std::string_view field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\r' || c == '\n') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) {
        out.append(field);
        return;
    }
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

void write_csv_record(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        append_csv_field(out, fields[i]);
    }
    out.push_back('\n');
}

void write_csv_record(std::ostream& os, const std::vector<std::string>& fields) {
    std::string line;
    write_csv_record(line, fields);
    os.write(line.data(), static_cast<std::streamsize>(line.size()));
}

}  // namespace triage
