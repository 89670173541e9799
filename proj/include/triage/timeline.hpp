#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "triage/errors.hpp"

namespace triage {

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;
    auto operator<=>(const Date&) const = default;
};

struct TimeOfDay {
    int hour = 0;
    int minute = 0;
    int second = 0;
    auto operator<=>(const TimeOfDay&) const = default;
};

bool is_valid_date(const Date& d);
bool is_valid_time(const TimeOfDay& t);
int days_in_month(int year, int month);
bool is_leap_year(int year);

// Days since 1970-01-01; valid for the proleptic Gregorian calendar.
std::int64_t days_from_civil(const Date& d);
Date civil_from_days(std::int64_t days);
// 0 = Monday ... 6 = Sunday.
int weekday_monday0(const Date& d);

std::string format_date(const Date& d);        // MM/DD/YYYY
std::string format_time(const TimeOfDay& t);   // HH:MM:SS
std::string format_iso_datetime(const Date& d, const TimeOfDay& t);  // YYYY-MM-DDTHH:MM:SS

// MM/DD/YYYY always; lenient additionally accepts YYYY-MM-DD and unpadded
// components. Returns nullopt when the text does not form a valid date.
std::optional<Date> parse_date(std::string_view text, bool lenient);
std::optional<TimeOfDay> parse_time(std::string_view text, bool lenient);

// Four flags rendered as a 4-char column: position 1 M or '.', then A, C, B.
struct MacbFlags {
    bool modified = false;
    bool accessed = false;
    bool changed = false;
    bool born = false;

    std::string to_string() const;
    static std::optional<MacbFlags> parse(std::string_view text);
    auto operator<=>(const MacbFlags&) const = default;
};

// One parsed l2tcsv row. `filename` is the file the event record came from;
// for filesystem records the acted-on path travels in `desc`.
struct TimelineEvent {
    std::uint64_t row_id = 0;
    Date date;
    TimeOfDay time;
    std::string timezone;
    MacbFlags macb;
    std::string source;
    std::string sourcetype;
    std::string event_type;
    std::string user;
    std::string host;
    std::string short_desc;
    std::string desc;
    std::string version;
    std::string filename;
    std::string inode;
    std::string notes;
    std::string format;
    std::string extra;

    bool operator==(const TimelineEvent&) const = default;
};

// Immutable after construction; safe to share across concurrent readers.
class Timeline {
public:
    Timeline() = default;
    Timeline(std::vector<TimelineEvent> events, std::string source_label);

    const std::vector<TimelineEvent>& events() const { return events_; }
    const std::string& source_label() const { return source_label_; }
    std::size_t size() const { return events_.size(); }

    // Binary search by row_id (row ids are strictly increasing).
    const TimelineEvent* find_row(std::uint64_t row_id) const;

    bool operator==(const Timeline&) const = default;

private:
    std::vector<TimelineEvent> events_;
    std::string source_label_;
};

enum class ParsePolicy { strict, lenient };

struct SkippedRow {
    std::uint64_t row_id;
    std::string reason;
};

struct ParseResult {
    Timeline timeline;
    std::uint64_t data_rows = 0;  // well-formed + skipped
    std::vector<SkippedRow> skipped;
};

inline constexpr std::string_view kL2tcsvHeader =
    "date,time,timezone,MACB,source,sourcetype,type,user,host,short,desc,version,filename,"
    "inode,notes,format,extra";
inline constexpr int kL2tcsvColumns = 17;

ParseResult parse_timeline(std::istream& input, ParsePolicy policy,
                           std::string source_label = "");
ParseResult parse_timeline(std::string_view buffer, ParsePolicy policy,
                           std::string source_label = "");
ParseResult parse_timeline_file(const std::filesystem::path& path, ParsePolicy policy);

void write_timeline(const Timeline& timeline, std::ostream& output);
std::string write_timeline_string(const Timeline& timeline);

struct TimelineSummary {
    std::uint64_t event_count = 0;
    std::uint64_t distinct_filename_count = 0;
    std::map<std::string, std::uint64_t> counts_by_event_type;
    std::map<std::string, std::uint64_t> counts_by_source;
    std::map<std::string, std::uint64_t> counts_by_sourcetype;
};

TimelineSummary summarize(const Timeline& timeline);

enum class TimelineField {
    date, time, timezone, macb, source, sourcetype, type, user, host, short_desc,
    desc, version, filename, inode, notes, format, extra
};

// Throws UnknownField for names outside the 17-column header.
TimelineField field_from_name(std::string_view name);

// Frequency table, descending by count, ties ascending lexicographic.
std::vector<std::pair<std::string, std::uint64_t>> value_counts(const Timeline& timeline,
                                                                TimelineField field);
std::vector<std::pair<std::string, std::uint64_t>> value_counts(const Timeline& timeline,
                                                                std::string_view field_name);

}  // namespace triage
